#pragma once

#include "rvsem/errors.hpp"
#include "rvsem/format.hpp"
#include "rvsem/lexicon.hpp"
#include "rvsem/noise.hpp"
#include "rvsem/query.hpp"
#include "rvsem/seedgen.hpp"
#include "rvsem/space.hpp"
#include "rvsem/store.hpp"
