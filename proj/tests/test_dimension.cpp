#include <catch2/catch_amalgamated.hpp>

#include "confdim/dimension.hpp"
#include "confdim/gauge.hpp"
#include "confdim/metric.hpp"
#include "confdim/verify.hpp"
#include "confdim/weights.hpp"
