#pragma once

#include "analysis.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "sampler.hpp"
#include "screening.hpp"
#include "stats.hpp"
#include "synth.hpp"
#include "tweet_metrics.hpp"
#include "user_metrics.hpp"
