#pragma once

#include "efpo/bvn.hpp"
#include "efpo/envy.hpp"
#include "efpo/instance.hpp"
#include "efpo/io.hpp"
#include "efpo/lottery_program.hpp"
#include "efpo/lp.hpp"
#include "efpo/rational.hpp"
#include "efpo/solver.hpp"
#include "efpo/verify.hpp"
#include "efpo/x3c.hpp"
