"""Independent reference implementations used as test oracles.

None of these import the package; they restate the physics or astronomy
from first principles so the package can be checked against them.
"""

import math
from datetime import datetime, timedelta


def noaa_solar_position(latitude, longitude, utc_offset, when: datetime):
    """Sun (altitude, azimuth) in degrees from the NOAA spreadsheet
    algorithm (Meeus low-precision ephemeris), without refraction."""
    utc = when - timedelta(hours=utc_offset)
    # Julian day
    y, m = utc.year, utc.month
    d = utc.day + (utc.hour + utc.minute / 60 + utc.second / 3600) / 24
    if m <= 2:
        y -= 1
        m += 12
    a = y // 100
    b = 2 - a + a // 4
    jd = int(365.25 * (y + 4716)) + int(30.6001 * (m + 1)) + d + b - 1524.5
    t = (jd - 2451545.0) / 36525.0

    l0 = (280.46646 + t * (36000.76983 + 0.0003032 * t)) % 360
    m_anom = 357.52911 + t * (35999.05029 - 0.0001537 * t)
    e = 0.016708634 - t * (0.000042037 + 0.0000001267 * t)
    mr = math.radians(m_anom)
    c = (math.sin(mr) * (1.914602 - t * (0.004817 + 0.000014 * t))
         + math.sin(2 * mr) * (0.019993 - 0.000101 * t) + math.sin(3 * mr) * 0.000289)
    true_long = l0 + c
    omega = 125.04 - 1934.136 * t
    app_long = true_long - 0.00569 - 0.00478 * math.sin(math.radians(omega))
    eps0 = 23 + (26 + (21.448 - t * (46.815 + t * (0.00059 - t * 0.001813))) / 60) / 60
    eps = eps0 + 0.00256 * math.cos(math.radians(omega))
    decl = math.degrees(math.asin(math.sin(math.radians(eps))
                                  * math.sin(math.radians(app_long))))
    yv = math.tan(math.radians(eps / 2)) ** 2
    l0r = math.radians(l0)
    eot = 4 * math.degrees(yv * math.sin(2 * l0r) - 2 * e * math.sin(mr)
                           + 4 * e * yv * math.sin(mr) * math.cos(2 * l0r)
                           - 0.5 * yv * yv * math.sin(4 * l0r) - 1.25 * e * e * math.sin(2 * mr))
    minutes = when.hour * 60 + when.minute + when.second / 60
    true_solar = (minutes + eot + 4 * longitude - 60 * utc_offset) % 1440
    hour_angle = true_solar / 4 - 180 if true_solar / 4 >= 0 else true_solar / 4 + 180
    lat, dec, ha = map(math.radians, (latitude, decl, hour_angle))
    cos_zen = math.sin(lat) * math.sin(dec) + math.cos(lat) * math.cos(dec) * math.cos(ha)
    zen = math.degrees(math.acos(max(-1.0, min(1.0, cos_zen))))
    # azimuth clockwise from north
    az_num = (math.sin(lat) * cos_zen - math.sin(dec))
    az_den = math.cos(lat) * math.sin(math.radians(zen))
    acos_arg = max(-1.0, min(1.0, az_num / az_den))
    if hour_angle > 0:
        az = (math.degrees(math.acos(acos_arg)) + 180) % 360
    else:
        az = (540 - math.degrees(math.acos(acos_arg))) % 360
    return 90 - zen, az


def layered_slab_temperatures(layers, t_left, t_right, positions):
    """Exact steady temperatures inside a layered slab with fixed face
    temperatures. ``layers`` is a list of (thickness, conductivity)."""
    bounds = [0.0]
    res = [0.0]
    for L, k in layers:
        bounds.append(bounds[-1] + L)
        res.append(res[-1] + L / k)
    total = res[-1]
    out = []
    for x in positions:
        for i, (L, k) in enumerate(layers):
            if x <= bounds[i + 1] + 1e-12 or i == len(layers) - 1:
                r = res[i] + (x - bounds[i]) / k
                break
        out.append(t_left + (t_right - t_left) * r / total)
    return out


def rc_step_response(t, tau, t0, t_inf):
    """Lumped capacitance response to a step in the driving temperature."""
    return t_inf + (t0 - t_inf) * math.exp(-t / tau)


def two_opening_stack_flow(c, n, rho_in, rho_out, dh, g=9.81):
    """Mass flow through each of two identical openings separated by
    ``dh`` in height, driven only by buoyancy. The neutral plane lies
    midway, so each opening sees half the stack pressure."""
    return c * (abs(rho_out - rho_in) * g * dh / 2) ** n
