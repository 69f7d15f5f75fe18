#pragma once

#include "alcrowd/corpus.hpp"
#include "alcrowd/crowd_qc.hpp"
#include "alcrowd/learners.hpp"
#include "alcrowd/simulator.hpp"
#include "alcrowd/strategies.hpp"
#include "alcrowd/synth.hpp"
