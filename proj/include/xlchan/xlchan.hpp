#pragma once

// Convenience umbrella: pulls in the whole library.

#include "xlchan/array.hpp"
#include "xlchan/channel.hpp"
#include "xlchan/configfile.hpp"
#include "xlchan/dictionary.hpp"
#include "xlchan/errors.hpp"
#include "xlchan/estimators.hpp"
#include "xlchan/experiments.hpp"
#include "xlchan/measurement.hpp"
#include "xlchan/rng.hpp"
#include "xlchan/version.hpp"
