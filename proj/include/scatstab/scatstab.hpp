#pragma once

// Umbrella header.

#include "scatstab/cartoon.hpp"
#include "scatstab/config.hpp"
#include "scatstab/deform.hpp"
#include "scatstab/experiments.hpp"
#include "scatstab/fft.hpp"
#include "scatstab/fit.hpp"
#include "scatstab/frames.hpp"
#include "scatstab/grid.hpp"
#include "scatstab/io.hpp"
#include "scatstab/network.hpp"
#include "scatstab/quadrature.hpp"
#include "scatstab/report.hpp"
#include "scatstab/rng.hpp"
#include "scatstab/signal.hpp"
