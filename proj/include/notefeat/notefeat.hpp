#pragma once

// Umbrella header for the notefeat symbolic-music feature extraction library.

#include "notefeat/annotations.hpp"
#include "notefeat/cache.hpp"
#include "notefeat/corpus.hpp"
#include "notefeat/eval.hpp"
#include "notefeat/extraction.hpp"
#include "notefeat/features.hpp"
#include "notefeat/kern.hpp"
#include "notefeat/midi.hpp"
#include "notefeat/musicxml.hpp"
#include "notefeat/postprocess.hpp"
#include "notefeat/rational.hpp"
#include "notefeat/score.hpp"
#include "notefeat/table.hpp"
#include "notefeat/version.hpp"
