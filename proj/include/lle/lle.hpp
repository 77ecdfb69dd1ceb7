#ifndef LLE_LLE_HPP
#define LLE_LLE_HPP

#include "lle/datasets.hpp"
#include "lle/evaluation.hpp"
#include "lle/io.hpp"
#include "lle/local_weights.hpp"
#include "lle/neighbors.hpp"
#include "lle/rng.hpp"
#include "lle/spectral_embedding.hpp"
#include "lle/svg_plot.hpp"
#include "lle/types.hpp"

#endif
