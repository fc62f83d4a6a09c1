#pragma once

#include "stitchkit/augment.hpp"
#include "stitchkit/commands.hpp"
#include "stitchkit/decompose.hpp"
#include "stitchkit/image.hpp"
#include "stitchkit/inject.hpp"
#include "stitchkit/io.hpp"
#include "stitchkit/metrics.hpp"
#include "stitchkit/resize.hpp"
#include "stitchkit/rng.hpp"
#include "stitchkit/score.hpp"
#include "stitchkit/serialize.hpp"
#include "stitchkit/version.hpp"
