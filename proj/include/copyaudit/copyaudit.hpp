// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "copyaudit/backends.hpp"
#include "copyaudit/blur.hpp"
#include "copyaudit/config.hpp"
#include "copyaudit/error.hpp"
#include "copyaudit/image.hpp"
#include "copyaudit/mask.hpp"
#include "copyaudit/metrics.hpp"
#include "copyaudit/mock_server.hpp"
#include "copyaudit/pipeline.hpp"
#include "copyaudit/png.hpp"
#include "copyaudit/wire.hpp"
