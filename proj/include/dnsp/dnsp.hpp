#pragma once

#include "checkpoint.hpp"
#include "conv.hpp"
#include "csv.hpp"
#include "data.hpp"
#include "errors.hpp"
#include "gradcheck.hpp"
#include "image.hpp"
#include "linalg.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "optim.hpp"
#include "pgm.hpp"
#include "priors.hpp"
#include "resample.hpp"
#include "run_config.hpp"
#include "studies.hpp"
#include "train.hpp"
