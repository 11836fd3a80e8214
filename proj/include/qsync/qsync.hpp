#pragma once

#include "qsync/analysis.hpp"
#include "qsync/bessel.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/error.hpp"
#include "qsync/quadrature.hpp"
#include "qsync/state.hpp"
