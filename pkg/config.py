# Copyright 2025 Frank Sommers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import os
from dotenv import load_dotenv

load_dotenv()

# Worker pool
BLAB_THREADS = int(os.getenv('BLAB_THREADS', str(os.cpu_count() or 1)))

# Output and logging
BLAB_OUTPUT_DIR = os.getenv('BLAB_OUTPUT_DIR', 'output')
LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')

# Randomized sweeps share one 64-bit seed (Philox counter-based stream)
BLAB_SEED = int(os.getenv('BLAB_SEED', '20240917'))

# Numerical defaults
DEFAULT_EPS = float(os.getenv('BLAB_EPS', '0.01'))            # numerator index b-1+eps
DEFAULT_SIGMA = float(os.getenv('BLAB_SIGMA', '0.05'))        # b' = b-1+sigma
DEFAULT_T_EVAL = float(os.getenv('BLAB_T_EVAL', '1.0'))
DEFAULT_QUAD_NODES = int(os.getenv('BLAB_QUAD_NODES', '64'))
DEFAULT_RESOLUTION = int(os.getenv('BLAB_RESOLUTION', '32'))

# Solver guard rails
BLOWUP_FACTOR = 1.0e6
CFL_PHASE_LIMIT = 1.0e6

# Output format
SCHEMA_VERSION = 1
SNAPSHOT_MAGIC = b'BLAB1'

SUBCOMMANDS = [
    'resonance',
    'blocks',
    'bilinear-sweep',
    'counterexample',
    'picard-growth',
    'solve',
    'norms',
]
