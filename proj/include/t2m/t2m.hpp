#pragma once
// Umbrella header.

#include "t2m/errors.hpp"
#include "t2m/expr.hpp"
#include "t2m/chart.hpp"
#include "t2m/tensors.hpp"
#include "t2m/calculus.hpp"
#include "t2m/sampling.hpp"
#include "t2m/report.hpp"
#include "t2m/canonical.hpp"
#include "t2m/connections.hpp"
#include "t2m/linear_connections.hpp"
#include "t2m/finsler.hpp"
#include "t2m/ast_json.hpp"
#include "t2m/scenario.hpp"
