#pragma once

#include "torusline/numtheory.hpp"
#include "torusline/torus.hpp"
#include "torusline/solver.hpp"
#include "torusline/construction.hpp"
#include "torusline/cache.hpp"
#include "torusline/reduction.hpp"
#include "torusline/pointfile.hpp"
