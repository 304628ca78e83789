#pragma once

// Transformation-based error-driven part-of-speech tagging.

#include "tbed/corpus.hpp"
#include "tbed/error.hpp"
#include "tbed/evaluator.hpp"
#include "tbed/learner.hpp"
#include "tbed/lexicon.hpp"
#include "tbed/model_io.hpp"
#include "tbed/rules.hpp"
#include "tbed/synthetic.hpp"
#include "tbed/tagger.hpp"
#include "tbed/unicode.hpp"
