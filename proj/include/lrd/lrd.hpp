#pragma once

// Core library; no image codecs. Include lrd/io/*.hpp for file formats.
#include "lrd/block_grid.hpp"
#include "lrd/descriptor.hpp"
#include "lrd/error.hpp"
#include "lrd/evaluation.hpp"
#include "lrd/image.hpp"
#include "lrd/parallel.hpp"
#include "lrd/radon.hpp"
#include "lrd/retrieval.hpp"
