#pragma once

#include "naminglab/core.hpp"
#include "naminglab/errors.hpp"
#include "naminglab/format.hpp"
#include "naminglab/hungarian.hpp"
#include "naminglab/linguistics.hpp"
#include "naminglab/matching.hpp"
#include "naminglab/metrics.hpp"
#include "naminglab/reporting.hpp"
#include "naminglab/service.hpp"
#include "naminglab/significance.hpp"
#include "naminglab/synth.hpp"
