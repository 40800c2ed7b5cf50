#pragma once

#include "alfilter/adaptive_filter.hpp"
#include "alfilter/alpha_field.hpp"
#include "alfilter/checkpoint.hpp"
#include "alfilter/diff_engine.hpp"
#include "alfilter/errors.hpp"
#include "alfilter/fourier_encoding.hpp"
#include "alfilter/image_io.hpp"
#include "alfilter/metrics.hpp"
#include "alfilter/mlp.hpp"
#include "alfilter/model.hpp"
#include "alfilter/ntk.hpp"
#include "alfilter/tasks.hpp"
