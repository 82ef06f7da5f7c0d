"""Scenario configuration and physical constants."""

import dataclasses
import json
import math

BOLTZMANN = 1.380649e-23  # J/K
NOISE_TEMP_K = 290.0


@dataclasses.dataclass
class EnergyConstants:
    """ADC power model coefficients.

    Per active low-resolution antenna the converter pair burns c0 * 2^b W;
    any activity among low-resolution antennas 2..N1 of an AP adds a single
    switching overhead of c1_watt; each active high-resolution antenna
    costs c2 W.
    """

    c0: float = 3e-5
    c1_watt: float = 0.002
    c2: float = 0.1229


@dataclasses.dataclass
class ScenarioConfig:
    area_side_km: float = 1.0          # D, wrap-free square side
    num_aps: int = 50                  # M
    num_users: int = 8                 # K
    antennas_per_ap: int = 4           # N
    low_res_antennas: int = 3          # N1, antennas 1..N1 carry b=1..N1 bit ADCs
    users_per_ap: int = 5              # L
    coherence_samples: int = 10        # tau_c
    pilot_samples: int = 10            # tau_p
    pilot_power_watt: float = 0.1      # rho_p before noise normalization
    uplink_power_watt: float = 0.1     # rho_u before noise normalization
    carrier_ghz: float = 1.9
    bandwidth_hz: float = 20e6
    noise_figure_db: float = 9.0
    shadowing_std_db: float = 8.0
    ap_height_m: float = 15.0
    user_height_m: float = 1.65
    rng_seed: int = 0

    def validate(self):
        if self.area_side_km <= 0:
            raise ValueError("area_side_km must be positive")
        if self.num_aps < 1 or self.num_users < 1 or self.antennas_per_ap < 1:
            raise ValueError("need at least one AP, user, and antenna")
        if not 0 <= self.low_res_antennas <= self.antennas_per_ap:
            raise ValueError("low_res_antennas must lie in [0, antennas_per_ap]")
        if not 1 <= self.users_per_ap <= self.num_users:
            raise ValueError("users_per_ap must lie in [1, num_users]")
        if self.num_users > self.num_aps * self.users_per_ap:
            raise ValueError("num_users exceeds total serving capacity M*L")
        if self.pilot_samples < 1 or self.coherence_samples < self.pilot_samples:
            raise ValueError("need 1 <= pilot_samples <= coherence_samples")
        if self.pilot_power_watt <= 0 or self.uplink_power_watt <= 0:
            raise ValueError("transmit powers must be positive")
        if self.bandwidth_hz <= 0 or self.carrier_ghz <= 0:
            raise ValueError("carrier and bandwidth must be positive")
        if self.shadowing_std_db < 0:
            raise ValueError("shadowing_std_db must be nonnegative")
        return self

    def noise_power_watt(self):
        """Thermal noise power: k_B * T0 * B * noise figure."""
        return (BOLTZMANN * NOISE_TEMP_K * self.bandwidth_hz
                * 10 ** (self.noise_figure_db / 10))

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - fields
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d).validate()


def load_config(path):
    """Read a ScenarioConfig (plus optional energy constants) from JSON.

    The file holds ScenarioConfig fields at top level; an optional
    "energy_constants" object overrides EnergyConstants fields.
    Returns (config, constants).
    """
    with open(path) as fh:
        raw = json.load(fh)
    energy = raw.pop("energy_constants", None)
    cfg = ScenarioConfig.from_dict(raw)
    if energy is None:
        consts = EnergyConstants()
    else:
        known = {f.name for f in dataclasses.fields(EnergyConstants)}
        unknown = set(energy) - known
        if unknown:
            raise ValueError(f"unknown energy_constants keys: {sorted(unknown)}")
        consts = EnergyConstants(**energy)
    return cfg, consts


def save_config(cfg, path, constants=None):
    doc = cfg.to_dict()
    if constants is not None:
        doc["energy_constants"] = dataclasses.asdict(constants)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def normalized_snrs(cfg):
    """Pilot and uplink transmit powers normalized by the noise power.

    Returns (rho_p, rho_u), both dimensionless.
    """
    pn = cfg.noise_power_watt()
    return cfg.pilot_power_watt / pn, cfg.uplink_power_watt / pn


def three_slope_constant_db(cfg):
    """Fixed attenuation term of the three-slope path loss model (dB).

    COST-Hata style constant for carrier frequency f (MHz) and antenna
    heights h_AP, h_u (m):

        L = 46.3 + 33.9 log10(f) - 13.82 log10(h_AP)
            - (1.1 log10(f) - 0.7) h_u + (1.56 log10(f) - 0.8)
    """
    f_mhz = cfg.carrier_ghz * 1e3
    lf = math.log10(f_mhz)
    return (46.3 + 33.9 * lf - 13.82 * math.log10(cfg.ap_height_m)
            - (1.1 * lf - 0.7) * cfg.user_height_m + (1.56 * lf - 0.8))
