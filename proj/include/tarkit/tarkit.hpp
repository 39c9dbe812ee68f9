#pragma once

// Umbrella header: the whole toolkit in one include.

#include "tarkit/autotar.hpp"
#include "tarkit/corpus.hpp"
#include "tarkit/dictionary.hpp"
#include "tarkit/embeddings.hpp"
#include "tarkit/error.hpp"
#include "tarkit/features.hpp"
#include "tarkit/feedback.hpp"
#include "tarkit/index.hpp"
#include "tarkit/linear_svm.hpp"
#include "tarkit/ltr.hpp"
#include "tarkit/metrics.hpp"
#include "tarkit/pipeline.hpp"
#include "tarkit/protocol.hpp"
#include "tarkit/qrels.hpp"
#include "tarkit/retrieval.hpp"
#include "tarkit/run_file.hpp"
#include "tarkit/service.hpp"
#include "tarkit/svd.hpp"
#include "tarkit/tfidf.hpp"
#include "tarkit/trace.hpp"
#include "tarkit/wmd.hpp"
