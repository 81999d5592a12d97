#pragma once

#include "xgnn/config.hpp"
#include "xgnn/errors.hpp"
#include "xgnn/fields.hpp"
#include "xgnn/forms.hpp"
#include "xgnn/geometry.hpp"
#include "xgnn/knowledge.hpp"
#include "xgnn/linalg.hpp"
#include "xgnn/output.hpp"
#include "xgnn/pencil.hpp"
#include "xgnn/presets.hpp"
#include "xgnn/quadrature.hpp"
#include "xgnn/solver.hpp"
#include "xgnn/validation.hpp"
