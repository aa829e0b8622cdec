#ifndef VIDEC_VIDEC_HPP
#define VIDEC_VIDEC_HPP

#include "videc/btd_io.hpp"
#include "videc/classify.hpp"
#include "videc/config.hpp"
#include "videc/dataset.hpp"
#include "videc/error.hpp"
#include "videc/eval.hpp"
#include "videc/filter.hpp"
#include "videc/hash.hpp"
#include "videc/manifest.hpp"
#include "videc/montage.hpp"
#include "videc/preprocess.hpp"
#include "videc/random.hpp"
#include "videc/report.hpp"
#include "videc/resample.hpp"
#include "videc/serialize.hpp"
#include "videc/spatial.hpp"
#include "videc/stats.hpp"
#include "videc/synth.hpp"
#include "videc/version.hpp"

#endif // VIDEC_VIDEC_HPP
