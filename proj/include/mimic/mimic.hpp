#pragma once

#include "mimic/cascade/ablation.hpp"
#include "mimic/cascade/cascade.hpp"
#include "mimic/dataset/manifest.hpp"
#include "mimic/dataset/synthetic.hpp"
#include "mimic/dataset/validate.hpp"
#include "mimic/eval/metrics.hpp"
#include "mimic/features/embedding.hpp"
#include "mimic/features/embedding_io.hpp"
#include "mimic/features/indicators.hpp"
#include "mimic/features/numeric.hpp"
#include "mimic/llm/baseline.hpp"
#include "mimic/models/gbt.hpp"
#include "mimic/models/mlp.hpp"
#include "mimic/models/random_forest.hpp"
