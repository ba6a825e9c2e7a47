#pragma once

// Umbrella header. The HTTP backend lives in capfix/http_backend.hpp and is
// not included here.

#include "capfix/alignment.hpp"
#include "capfix/corpus.hpp"
#include "capfix/corrector.hpp"
#include "capfix/error.hpp"
#include "capfix/metrics.hpp"
#include "capfix/resync.hpp"
#include "capfix/subtitle_io.hpp"
#include "capfix/text_norm.hpp"
#include "capfix/transcript.hpp"
