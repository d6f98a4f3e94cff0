#pragma once

// Umbrella header.

#include "struedit/chain.hpp"
#include "struedit/clock.hpp"
#include "struedit/error.hpp"
#include "struedit/harness.hpp"
#include "struedit/ice_baseline.hpp"
#include "struedit/knowledge_structure.hpp"
#include "struedit/lexical.hpp"
#include "struedit/matcher.hpp"
#include "struedit/mquake.hpp"
#include "struedit/oracle.hpp"
#include "struedit/oracle_io.hpp"
#include "struedit/oracle_remote.hpp"
#include "struedit/pipeline.hpp"
#include "struedit/synthetic.hpp"
#include "struedit/text.hpp"
#include "struedit/types.hpp"
