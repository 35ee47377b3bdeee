#pragma once

// Umbrella header.
#include "arc/attacks.hpp"
#include "arc/csv.hpp"
#include "arc/dataset.hpp"
#include "arc/detect.hpp"
#include "arc/error.hpp"
#include "arc/features.hpp"
#include "arc/linalg.hpp"
#include "arc/lm.hpp"
#include "arc/loss.hpp"
#include "arc/network.hpp"
#include "arc/pipeline.hpp"
#include "arc/rng.hpp"
#include "arc/stats.hpp"
#include "arc/svm.hpp"
#include "arc/train.hpp"
