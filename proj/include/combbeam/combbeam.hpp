#pragma once

#include "combbeam/analysis.hpp"
#include "combbeam/conventional.hpp"
#include "combbeam/geometry.hpp"
#include "combbeam/kspace.hpp"
#include "combbeam/propagation.hpp"
#include "combbeam/tuning.hpp"
#include "combbeam/waveform.hpp"
