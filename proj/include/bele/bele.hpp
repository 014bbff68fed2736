#ifndef BELE_BELE_HPP
#define BELE_BELE_HPP

#include "bele/calibration.hpp"
#include "bele/convolve.hpp"
#include "bele/core_model.hpp"
#include "bele/edge_index.hpp"
#include "bele/error.hpp"
#include "bele/fusion.hpp"
#include "bele/harness.hpp"
#include "bele/image.hpp"
#include "bele/image_io.hpp"
#include "bele/nelder_mead.hpp"
#include "bele/render.hpp"
#include "bele/stats.hpp"
#include "bele/synthetic.hpp"
#include "bele/texture_index.hpp"
#include "bele/vrf.hpp"

#endif // BELE_BELE_HPP
