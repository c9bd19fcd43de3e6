#pragma once

#include "ehs/background.hpp"
#include "ehs/constraints.hpp"
#include "ehs/edge_hist.hpp"
#include "ehs/fourier.hpp"
#include "ehs/gradients.hpp"
#include "ehs/image.hpp"
#include "ehs/image_io.hpp"
#include "ehs/pipeline.hpp"
#include "ehs/solvers.hpp"
