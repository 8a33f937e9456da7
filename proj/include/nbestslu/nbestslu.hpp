#pragma once

// Umbrella header for the n-best SLU laboratory.

#include "nbestslu/autodiff.hpp"
#include "nbestslu/bpe.hpp"
#include "nbestslu/checkpoint.hpp"
#include "nbestslu/classifier.hpp"
#include "nbestslu/config.hpp"
#include "nbestslu/corpus.hpp"
#include "nbestslu/edit_distance.hpp"
#include "nbestslu/encoder.hpp"
#include "nbestslu/error.hpp"
#include "nbestslu/gradient_check.hpp"
#include "nbestslu/integration.hpp"
#include "nbestslu/metrics.hpp"
#include "nbestslu/nbest_list.hpp"
#include "nbestslu/optimizer.hpp"
#include "nbestslu/rng.hpp"
#include "nbestslu/simulator.hpp"
#include "nbestslu/tensor.hpp"
#include "nbestslu/train.hpp"
