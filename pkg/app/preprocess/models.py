"""Filter specifications for the preprocessing chain."""

import enum
from dataclasses import dataclass

from app.exceptions import InvalidParameterError

DEFAULT_BANDPASS_ORDER = 10
DEFAULT_NOTCH_ORDER = 4
DEFAULT_NOTCH_HALF_WIDTH = 1.0


class FilterKind(str, enum.Enum):
    BANDPASS = "bandpass"
    NOTCH = "notch"


class BaselineMode(str, enum.Enum):
    MEAN = "mean"
    ZSCORE = "zscore"


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth band-pass or band-stop notch, applied forward-backward."""

    kind: FilterKind
    low_cut: float = 0.0
    high_cut: float = 0.0
    notch_center: float = 0.0
    order: int = DEFAULT_BANDPASS_ORDER
    notch_half_width: float = DEFAULT_NOTCH_HALF_WIDTH

    @classmethod
    def bandpass(cls, low: float, high: float, order: int = DEFAULT_BANDPASS_ORDER) -> "FilterSpec":
        return cls(kind=FilterKind.BANDPASS, low_cut=low, high_cut=high, order=order)

    @classmethod
    def notch(cls, center: float, order: int = DEFAULT_NOTCH_ORDER,
              half_width: float = DEFAULT_NOTCH_HALF_WIDTH) -> "FilterSpec":
        return cls(kind=FilterKind.NOTCH, notch_center=center, order=order, notch_half_width=half_width)

    def validate(self, sample_rate: float) -> None:
        """Check the cutoffs against the Nyquist frequency of ``sample_rate``."""
        nyquist = sample_rate / 2
        if self.order < 1:
            raise InvalidParameterError(f"filter order must be positive, got {self.order}")
        if self.kind == FilterKind.BANDPASS:
            if not 0 < self.low_cut < self.high_cut:
                raise InvalidParameterError(
                    f"band-pass needs 0 < low < high, got ({self.low_cut}, {self.high_cut})"
                )
            if self.high_cut >= nyquist:
                raise InvalidParameterError(
                    f"band-pass high cutoff {self.high_cut} Hz is at or above Nyquist ({nyquist} Hz)"
                )
        else:
            if self.order < 2 or self.order % 2:
                raise InvalidParameterError(f"notch order must be even and >= 2, got {self.order}")
            if self.notch_half_width <= 0:
                raise InvalidParameterError("notch half width must be positive")
            low = self.notch_center - self.notch_half_width
            high = self.notch_center + self.notch_half_width
            if not 0 < self.notch_center < nyquist:
                raise InvalidParameterError(
                    f"notch center {self.notch_center} Hz must lie in (0, {nyquist}) Hz"
                )
            if low <= 0 or high >= nyquist:
                raise InvalidParameterError(
                    f"notch stop band ({low}, {high}) Hz does not fit below Nyquist ({nyquist} Hz)"
                )
