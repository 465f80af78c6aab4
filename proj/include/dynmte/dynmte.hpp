#pragma once

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/panel_io.hpp"
#include "dynmte/core/parallel.hpp"
#include "dynmte/core/random.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/dgp/dgp.hpp"
#include "dynmte/diagnostics/baseline.hpp"
#include "dynmte/diagnostics/liv.hpp"
#include "dynmte/firststage/firststage.hpp"
#include "dynmte/harness/curve.hpp"
#include "dynmte/harness/mc.hpp"
#include "dynmte/mtr/bootstrap.hpp"
#include "dynmte/mtr/conditional.hpp"
#include "dynmte/mtr/pipeline.hpp"
#include "dynmte/mtr/surface.hpp"
#include "dynmte/numkit/least_squares.hpp"
#include "dynmte/numkit/logistic.hpp"
#include "dynmte/numkit/poly_basis.hpp"
#include "dynmte/numkit/quadrature.hpp"
#include "dynmte/version.hpp"
