#pragma once

#include "realign/criteria.hpp"
#include "realign/errors.hpp"
#include "realign/harness.hpp"
#include "realign/perm_comb.hpp"
#include "realign/random_states.hpp"
#include "realign/report.hpp"
#include "realign/spectra.hpp"
#include "realign/tensor_ops.hpp"
