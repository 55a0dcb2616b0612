#pragma once

#include "storylab/candidates.hpp"
#include "storylab/checkpoint.hpp"
#include "storylab/config_file.hpp"
#include "storylab/context.hpp"
#include "storylab/corpus.hpp"
#include "storylab/encoder.hpp"
#include "storylab/gradcheck.hpp"
#include "storylab/harness.hpp"
#include "storylab/kmeans.hpp"
#include "storylab/metrics.hpp"
#include "storylab/multitask.hpp"
#include "storylab/relations.hpp"
#include "storylab/report.hpp"
#include "storylab/sentiment.hpp"
#include "storylab/synthetic.hpp"
#include "storylab/text.hpp"
#include "storylab/tfidf.hpp"
#include "storylab/vocab.hpp"
