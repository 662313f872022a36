#pragma once

#include "gaussib/analysis.hpp"
#include "gaussib/channel.hpp"
#include "gaussib/compound.hpp"
#include "gaussib/dpcm.hpp"
#include "gaussib/errors.hpp"
#include "gaussib/model_io.hpp"
#include "gaussib/pf.hpp"
#include "gaussib/spectra.hpp"
#include "gaussib/waterfill.hpp"
