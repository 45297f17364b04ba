"""Number formatting shared by reports, CSVs and plots."""


def sig6(x: float) -> str:
    """Format a statistic with 6 significant digits (report contract)."""
    return format(float(x), ".6g")


def fmt_level(x: float) -> str:
    """Format an axis coordinate with shortest round-trip precision.

    Coordinates are grid keys, not measurements; they must survive a
    CSV round trip bit-exactly.
    """
    return repr(float(x))


def fmt_weight(z: int) -> str:
    """Render a parameter count for reports: 167000000 -> '167M'."""
    z = int(z)
    if z >= 1_000_000:
        return sig6(z / 1e6) + "M"
    return str(z)
