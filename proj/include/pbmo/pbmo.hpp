#pragma once

#include "dyadic.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "grid_function.hpp"
#include "haar.hpp"
#include "io.hpp"
#include "norms.hpp"
#include "operators.hpp"
#include "test_functions.hpp"
