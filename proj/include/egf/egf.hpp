#pragma once

#include "egf/grid.hpp"
#include "egf/spectral.hpp"
#include "egf/one_form.hpp"
#include "egf/product_state.hpp"
#include "egf/geometry.hpp"
#include "egf/fd_oracle.hpp"
#include "egf/flow.hpp"
#include "egf/invariants.hpp"
#include "egf/scenario.hpp"
#include "egf/io.hpp"
#include "egf/runner.hpp"
