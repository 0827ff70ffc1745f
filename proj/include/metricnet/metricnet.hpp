#pragma once

#include "metricnet/coupling.hpp"
#include "metricnet/error.hpp"
#include "metricnet/fd.hpp"
#include "metricnet/generators.hpp"
#include "metricnet/io.hpp"
#include "metricnet/linalg.hpp"
#include "metricnet/minimize.hpp"
#include "metricnet/network.hpp"
#include "metricnet/network_function.hpp"
#include "metricnet/spectral.hpp"
#include "metricnet/symmetry.hpp"
