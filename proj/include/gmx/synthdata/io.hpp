#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/synthdata/dataset.hpp"

// Dataset text format:
//   gmxdata v1
//   <role> <label or -> vector <D> <v1> ... <vD>
//   <role> <label or -> image <H> <W> <C> <v1> ... <vHWC>
// Values use the shortest decimal form that round-trips exactly.

namespace gmx {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

inline std::string encode_dataset(const DomainDataset& ds) {
  std::string out = "gmxdata v1\n";
  const std::string role(to_string(ds.role));
  std::string dims = ds.kind.is_image() ? "image " + std::to_string(ds.kind.height) + ' ' +
                                              std::to_string(ds.kind.width) + ' ' +
                                              std::to_string(ds.kind.channels)
                                        : "vector " + std::to_string(ds.kind.length);
  for (const LabeledSample& s : ds.samples) {
    out += role;
    out += ' ';
    out += s.label ? std::to_string(*s.label) : "-";
    out += ' ';
    out += dims;
    for (double v : s.payload.data()) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

/// Parses the text format. `class_count` is not stored in the file; pass it
/// when known, otherwise it is inferred as max label + 1.
inline DomainDataset decode_dataset(const std::string& text, int class_count = 0) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "gmxdata v1") throw IoError("dataset: missing 'gmxdata v1' header");
  DomainDataset ds;
  bool first = true;
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string at = "dataset line " + std::to_string(line_no) + ": ";
    std::istringstream ls(line);
    std::string role, label, kind;
    if (!(ls >> role >> label >> kind)) throw IoError(at + "truncated record");
    PayloadKind pk;
    if (kind == "vector") {
      std::size_t d = 0;
      if (!(ls >> d) || d == 0) throw IoError(at + "bad vector length");
      pk = PayloadKind::vector(d);
    } else if (kind == "image") {
      std::size_t h = 0, w = 0, c = 0;
      if (!(ls >> h >> w >> c) || h == 0 || w == 0 || c == 0) throw IoError(at + "bad image dims");
      pk = PayloadKind::image(h, w, c);
    } else {
      throw IoError(at + "unknown payload kind '" + kind + "'");
    }
    DomainRole r;
    try {
      r = parse_role(role);
    } catch (const ConfigError& e) {
      throw IoError(at + e.what());
    }
    if (first) {
      ds.role = r;
      ds.kind = pk;
      first = false;
    } else if (r != ds.role || !(pk == ds.kind)) {
      throw IoError(at + "role or payload kind differs from the first record");
    }
    std::vector<double> values(pk.flat_size());
    for (double& v : values) {
      std::string tok;
      if (!(ls >> tok)) throw IoError(at + "too few payload values");
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) throw IoError(at + "bad number '" + tok + "'");
    }
    std::string extra;
    if (ls >> extra) throw IoError(at + "too many payload values");
    LabeledSample s{Tensor(pk.shape(), std::move(values)), std::nullopt};
    if (label != "-") {
      int y = 0;
      const auto res = std::from_chars(label.data(), label.data() + label.size(), y);
      if (res.ec != std::errc() || y < 0) throw IoError(at + "bad label '" + label + "'");
      s.label = y;
      max_label = std::max(max_label, y);
    }
    ds.samples.push_back(std::move(s));
  }
  ds.class_count = class_count > 0 ? class_count : max_label + 1;
  ds.validate();
  return ds;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void save_dataset(const std::filesystem::path& path, const DomainDataset& ds) {
  write_text_file(path, encode_dataset(ds));
}

inline DomainDataset load_dataset(const std::filesystem::path& path, int class_count = 0) {
  return decode_dataset(read_text_file(path), class_count);
}

/// Eval-label sidecar: "index,label" CSV.
inline std::string encode_eval_labels(const EvalLabels& labels) {
  std::string out = "index,label\n";
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(labels.labels[i]) + '\n';
  }
  return out;
}

inline EvalLabels decode_eval_labels(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "index,label") throw IoError("eval labels: missing header");
  EvalLabels out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("eval labels: bad row '" + line + "'");
    std::size_t idx = 0;
    int y = 0;
    auto r1 = std::from_chars(line.data(), line.data() + comma, idx);
    auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), y);
    if (r1.ec != std::errc() || r2.ec != std::errc() || idx != out.labels.size() || y < 0) {
      throw IoError("eval labels: bad row '" + line + "'");
    }
    out.labels.push_back(y);
  }
  return out;
}

}  // namespace gmx
