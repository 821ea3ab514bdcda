#pragma once

#include "sawtooth/airy.hpp"
#include "sawtooth/bands.hpp"
#include "sawtooth/csv.hpp"
#include "sawtooth/finite_lattice.hpp"
#include "sawtooth/lattice.hpp"
#include "sawtooth/random_perturbation.hpp"
#include "sawtooth/spectral_density.hpp"
