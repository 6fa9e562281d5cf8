#pragma once

#include "fairdiv/core.hpp"
#include "fairdiv/io.hpp"
#include "fairdiv/pf.hpp"
#include "fairdiv/random.hpp"
#include "fairdiv/rational.hpp"
#include "fairdiv/sdm.hpp"
#include "fairdiv/sw_mechanisms.hpp"
#include "fairdiv/two_item.hpp"
#include "fairdiv/verifier.hpp"
