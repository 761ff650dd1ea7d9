#pragma once

#include "rational.hpp"
#include "poly.hpp"
#include "chart.hpp"
#include "weyl.hpp"
#include "fedosov.hpp"
#include "symfield.hpp"
#include "liecross.hpp"
#include "text.hpp"
#include "problem.hpp"
#include "random.hpp"
#include "verify.hpp"
