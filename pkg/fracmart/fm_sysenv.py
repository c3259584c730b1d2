import os
from dotenv import load_dotenv


# Load environment variables from .env file
def load_env_from_execution_dir() -> None:
    """
    Function Description:
        This function loads environment variables from a .env file in the current execution directory.
    Args:
        None
    Keyword Args:
        None
    Returns:
        None
    """
    execution_dir = os.path.abspath(os.getcwd())
    env_path = os.path.join(execution_dir, ".env")

    if os.path.exists(env_path):
        load_dotenv(dotenv_path=env_path)


def env_int(name: str, default: int) -> int:
    """
    Function Description:
        Reads an integer environment variable, falling back to the default
        when the variable is unset or empty.
    Args:
        name : str : Variable name
        default : int : Fallback value
    Keyword Args:
        None
    Returns:
        int : The parsed value
    """
    raw = os.environ.get(name, "")
    if raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


load_env_from_execution_dir()

FRACMART_WORKERS = env_int("FRACMART_WORKERS", 1)
FRACMART_GRID_CELLS = env_int("FRACMART_GRID_CELLS", 2**12)
FRACMART_REPLICATES = env_int("FRACMART_REPLICATES", 10_000)
FRACMART_PILOT_SIZE = env_int("FRACMART_PILOT_SIZE", 1000)
FRACMART_OUTPUT_DIR = os.path.expanduser(
    os.environ.get("FRACMART_OUTPUT_DIR", "./fracmart_runs")
)
FRACMART_LOG_LEVEL = os.environ.get("FRACMART_LOG_LEVEL", "WARNING")
