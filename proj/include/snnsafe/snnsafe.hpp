#pragma once

#include "snnsafe/convert.hpp"
#include "snnsafe/encode.hpp"
#include "snnsafe/error.hpp"
#include "snnsafe/io.hpp"
#include "snnsafe/milp/lp_format.hpp"
#include "snnsafe/milp/model.hpp"
#include "snnsafe/milp/simplex.hpp"
#include "snnsafe/milp/solver.hpp"
#include "snnsafe/model.hpp"
#include "snnsafe/search.hpp"
#include "snnsafe/sim.hpp"
#include "snnsafe/tighten.hpp"
#include "snnsafe/verify.hpp"
