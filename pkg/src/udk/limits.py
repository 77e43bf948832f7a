import os

DEFAULT_INTERVAL_CAP = 10**7


def interval_cap() -> int:
    """Largest partition size any construction may build; ``UDK_BUDGET`` overrides."""
    raw = os.environ.get("UDK_BUDGET")
    if raw is None or raw.strip() == "":
        return DEFAULT_INTERVAL_CAP
    return int(raw)
