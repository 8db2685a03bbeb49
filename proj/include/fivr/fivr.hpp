#pragma once

#include "fivr/annotate.hpp"
#include "fivr/core.hpp"
#include "fivr/evalkit.hpp"
#include "fivr/features.hpp"
#include "fivr/index.hpp"
#include "fivr/ingest.hpp"
#include "fivr/labels.hpp"
#include "fivr/pipeline.hpp"
#include "fivr/selectq.hpp"
#include "fivr/service.hpp"
#include "fivr/sparse.hpp"
#include "fivr/synth.hpp"
#include "fivr/textsim.hpp"
#include "fivr/vocab.hpp"
