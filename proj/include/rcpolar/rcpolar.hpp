#pragma once

#include "rcpolar/alignment.hpp"
#include "rcpolar/channel.hpp"
#include "rcpolar/construction.hpp"
#include "rcpolar/harq.hpp"
#include "rcpolar/polar.hpp"
#include "rcpolar/ratecompat.hpp"
#include "rcpolar/serialization.hpp"
