#pragma once

#include "tgeps/common.hpp"
#include "tgeps/eval.hpp"
#include "tgeps/graph.hpp"
#include "tgeps/lstm.hpp"
#include "tgeps/sampler.hpp"
#include "tgeps/synthetic.hpp"
#include "tgeps/text.hpp"
#include "tgeps/tge.hpp"
#include "tgeps/trainer.hpp"
