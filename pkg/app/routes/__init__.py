from .checks import COMMANDS as check_commands
from .dynamics import COMMANDS as dynamics_commands
from .experiments import COMMANDS as experiment_commands
from .traces import COMMANDS as trace_commands

COMMANDS = {
    **experiment_commands,
    **check_commands,
    **dynamics_commands,
    **trace_commands,
}

__all__ = ["COMMANDS"]
