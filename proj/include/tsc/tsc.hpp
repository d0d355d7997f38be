#pragma once

#include "tsc/core.hpp"
#include "tsc/measures.hpp"
#include "tsc/classify.hpp"
#include "tsc/tune.hpp"
#include "tsc/stats.hpp"
#include "tsc/io.hpp"
#include "tsc/svg.hpp"
#include "tsc/synthetic.hpp"
#include "tsc/experiment.hpp"
