#pragma once

#include "sslb/analytic.hpp"
#include "sslb/arith.hpp"
#include "sslb/cache.hpp"
#include "sslb/decomposition.hpp"
#include "sslb/errors.hpp"
#include "sslb/harness.hpp"
#include "sslb/parallel.hpp"
#include "sslb/prime_table.hpp"
#include "sslb/semiprime.hpp"
#include "sslb/summation.hpp"
#include "sslb/version.hpp"
