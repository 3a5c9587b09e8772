#pragma once

#include "gibbskit/error.hpp"
#include "gibbskit/numeric.hpp"
#include "gibbskit/shift.hpp"
#include "gibbskit/interaction.hpp"
#include "gibbskit/potential.hpp"
#include "gibbskit/cocycle.hpp"
#include "gibbskit/specification.hpp"
#include "gibbskit/transfer.hpp"
#include "gibbskit/verify.hpp"
#include "gibbskit/sampler.hpp"
#include "gibbskit/model.hpp"
#include "gibbskit/cli.hpp"
