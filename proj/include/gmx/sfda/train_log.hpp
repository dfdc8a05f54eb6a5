#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gmx/synthdata/io.hpp"

namespace gmx {

struct TrainLogRow {
  std::size_t epoch = 0;
  double loss_total = 0.0;
  double loss_ent = 0.0;
  double loss_div = 0.0;
  double loss_pl = 0.0;
  double src_acc = NAN;  // NaN when not measured
  double tgt_acc = NAN;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
  double wall_seconds = 0.0;  // kept out of the CSV so reruns stay byte-identical
};

inline std::string train_log_csv(const TrainLog& log) {
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_fixed(v, 6); };
  std::string out = "epoch,loss_total,loss_ent,loss_div,loss_pl,src_acc,tgt_acc\n";
  for (const TrainLogRow& r : log.rows) {
    out += std::to_string(r.epoch) + ',' + cell(r.loss_total) + ',' + cell(r.loss_ent) + ',' + cell(r.loss_div) +
           ',' + cell(r.loss_pl) + ',' + cell(r.src_acc) + ',' + cell(r.tgt_acc) + '\n';
  }
  return out;
}

}  // namespace gmx
