#pragma once

#include "netloc/errors.hpp"
#include "netloc/harness.hpp"
#include "netloc/io.hpp"
#include "netloc/lagrangian.hpp"
#include "netloc/minimax.hpp"
#include "netloc/network.hpp"
#include "netloc/root_finder.hpp"
