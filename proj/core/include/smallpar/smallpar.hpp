#pragma once

#include "smallpar/averaging.hpp"
#include "smallpar/common.hpp"
#include "smallpar/conditions.hpp"
#include "smallpar/expr.hpp"
#include "smallpar/ode.hpp"
#include "smallpar/periodic.hpp"
#include "smallpar/quadrature.hpp"
#include "smallpar/system.hpp"
#include "smallpar/topology.hpp"
#include "smallpar/variational.hpp"
