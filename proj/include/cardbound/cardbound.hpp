#pragma once

#include "cardbound/entropic_lp.hpp"
#include "cardbound/error.hpp"
#include "cardbound/experiment.hpp"
#include "cardbound/homcount.hpp"
#include "cardbound/moments.hpp"
#include "cardbound/query_catalog.hpp"
#include "cardbound/relation.hpp"
#include "cardbound/simplex.hpp"
#include "cardbound/venn.hpp"
