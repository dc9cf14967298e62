# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Short import alias for soc_dual_control.

    import socdc
    summary = socdc.run_monte_carlo(socdc.reference_config(), runs=5)
"""

from soc_dual_control import *  # noqa: F403, F401
from soc_dual_control import __version__  # noqa: F401
