import numpy as np

from models.psi import PsiFunction


def log_grid(psi: PsiFunction, size: int, periods: float = 3.0) -> np.ndarray:
    """
    Log-spaced grid spanning `periods` periods of h, centered at x = 1
    (frechet) or x = -1 (weibull). Returned in increasing x order.

    Args:
        psi: Exponent function fixing branch and period
        size: Number of grid points (>= 2)
        periods: Number of periods of ln|x| covered

    Returns:
        Sorted array of x values inside the branch support
    """
    if size < 2:
        raise ValueError(f"grid size must be >= 2, got {size}")
    half = 0.5 * periods * psi.h.period
    y = np.linspace(-half, half, size)
    if psi.branch == "frechet":
        return np.exp(y)
    return -np.exp(y[::-1])


def geometric_grid(start: float, stop: float, size: int) -> np.ndarray:
    if start <= 0.0 or stop <= start:
        raise ValueError(f"geometric grid needs 0 < start < stop, got [{start}, {stop}]")
    return np.geomspace(start, stop, size)
