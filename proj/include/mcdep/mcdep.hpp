#ifndef MCDEP_MCDEP_HPP_
#define MCDEP_MCDEP_HPP_

#include "mcdep/analysis.hpp"
#include "mcdep/applications.hpp"
#include "mcdep/conllu.hpp"
#include "mcdep/error.hpp"
#include "mcdep/features.hpp"
#include "mcdep/inference.hpp"
#include "mcdep/marginals.hpp"
#include "mcdep/model.hpp"
#include "mcdep/parallel.hpp"
#include "mcdep/query.hpp"
#include "mcdep/rng.hpp"
#include "mcdep/sentence.hpp"
#include "mcdep/stats.hpp"
#include "mcdep/synthetic.hpp"
#include "mcdep/train.hpp"
#include "mcdep/transition.hpp"

#endif  // MCDEP_MCDEP_HPP_
