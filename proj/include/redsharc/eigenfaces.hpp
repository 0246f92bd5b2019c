#pragma once

#include "redsharc/eigenfaces/dataset.hpp"
#include "redsharc/eigenfaces/linalg.hpp"
#include "redsharc/eigenfaces/pipeline.hpp"
