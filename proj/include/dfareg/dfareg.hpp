#pragma once

#include "dfareg/arfima.hpp"
#include "dfareg/error.hpp"
#include "dfareg/fluctuation.hpp"
#include "dfareg/io.hpp"
#include "dfareg/montecarlo.hpp"
#include "dfareg/regression.hpp"
