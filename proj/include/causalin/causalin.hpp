#pragma once

#include "causalin/relation.hpp"
#include "causalin/errors.hpp"
#include "causalin/label.hpp"
#include "causalin/exstruct.hpp"
#include "causalin/seqspec.hpp"
#include "causalin/checker.hpp"
#include "causalin/c11.hpp"
#include "causalin/litmus.hpp"
#include "causalin/enumerate.hpp"
#include "causalin/hbsim.hpp"
#include "causalin/io.hpp"
