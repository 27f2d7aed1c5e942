#pragma once

// Umbrella header for the ambirot library.

#include "ambirot/linalg.hpp"
#include "ambirot/rng.hpp"
#include "ambirot/special.hpp"
#include "ambirot/parallel.hpp"
#include "ambirot/rotations.hpp"
#include "ambirot/tensors.hpp"
#include "ambirot/embeddings.hpp"
#include "ambirot/averaged.hpp"
#include "ambirot/optimize.hpp"
#include "ambirot/mean.hpp"
#include "ambirot/distributions.hpp"
#include "ambirot/inference.hpp"
#include "ambirot/regression.hpp"
#include "ambirot/stereonet.hpp"
