#include <benchmark/benchmark.h>
#include "overdet/ld2.hpp"
BENCHMARK_MAIN();
