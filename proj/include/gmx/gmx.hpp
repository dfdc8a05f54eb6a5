#pragma once

// Umbrella header for the whole library.

#include "gmx/numerics/checkpoint.hpp"
#include "gmx/numerics/error.hpp"
#include "gmx/numerics/grad.hpp"
#include "gmx/numerics/loss.hpp"
#include "gmx/numerics/mlp.hpp"
#include "gmx/numerics/optimizer.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/numerics/tensor.hpp"

#include "gmx/synthdata/benchmark.hpp"
#include "gmx/synthdata/conv_stem.hpp"
#include "gmx/synthdata/dataset.hpp"
#include "gmx/synthdata/gaussian.hpp"
#include "gmx/synthdata/io.hpp"
#include "gmx/synthdata/moons.hpp"
#include "gmx/synthdata/shape_texture.hpp"
#include "gmx/synthdata/split.hpp"

#include "gmx/generic/augment.hpp"
#include "gmx/generic/dft.hpp"
#include "gmx/generic/edges.hpp"
#include "gmx/generic/mixup.hpp"

#include "gmx/sfda/client.hpp"
#include "gmx/sfda/evaluate.hpp"
#include "gmx/sfda/pipeline.hpp"
#include "gmx/sfda/pseudo_label.hpp"
#include "gmx/sfda/train_log.hpp"
#include "gmx/sfda/vendor.hpp"

#include "gmx/metrics/classifier.hpp"
#include "gmx/metrics/divergence.hpp"
#include "gmx/metrics/tradeoff.hpp"

#include "gmx/theorem/insight2.hpp"
#include "gmx/theorem/lab.hpp"
#include "gmx/theorem/setup.hpp"

#include "gmx/cli/commands.hpp"
#include "gmx/cli/config.hpp"
