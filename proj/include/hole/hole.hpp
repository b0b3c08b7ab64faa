#pragma once

#include "hole/assocmem.hpp"
#include "hole/checkpoint.hpp"
#include "hole/countries.hpp"
#include "hole/error.hpp"
#include "hole/eval.hpp"
#include "hole/holo_ops.hpp"
#include "hole/kgdata.hpp"
#include "hole/matrix.hpp"
#include "hole/models.hpp"
#include "hole/rng.hpp"
#include "hole/training.hpp"
