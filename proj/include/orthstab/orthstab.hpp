#pragma once

#include "error.hpp"
#include "ring.hpp"
#include "matrix.hpp"
#include "form.hpp"
#include "isometry.hpp"
#include "adapted.hpp"
#include "wpo.hpp"
#include "linalg_fp.hpp"
#include "ori_module.hpp"
#include "init_terms.hpp"
#include "homology.hpp"
