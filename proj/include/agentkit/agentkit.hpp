#pragma once
// Umbrella header.

#include "agentkit/app.hpp"
#include "agentkit/config.hpp"
#include "agentkit/engine.hpp"
#include "agentkit/error_class.hpp"
#include "agentkit/errors.hpp"
#include "agentkit/evalkit.hpp"
#include "agentkit/memory_manager.hpp"
#include "agentkit/prompt_composer.hpp"
#include "agentkit/simd/similarity_kernels.hpp"
#include "agentkit/text.hpp"
#include "agentkit/tokenizer.hpp"
#include "agentkit/tool_index.hpp"
#include "agentkit/toolhost.hpp"
#include "agentkit/trace_model.hpp"
#include "agentkit/wire.hpp"
