import pytest

from minibus.model import Instance, InstanceConfig, RouteParams, derive_route


@pytest.fixture
def cfg():
    # F=4, 7-hour peak, schedule penalties from the standard calibration.
    return InstanceConfig(capacity=4.0, t1=0.0, t2=420.0, total_drivers=100.0)


@pytest.fixture
def lin_route(cfg):
    # Zero cost advantage: piecewise-linear demand, p = 10.
    r = RouteParams(
        id="lin", fare=50.0, travel_time=10.0, trip_cost=160.0,
        total_demand=4200.0, cost_advantage=0.0,
    )
    return derive_route(r, cfg)


@pytest.fixture
def vic_route(cfg):
    # Queuing regime: 30 waiting-minutes of cost advantage, p = 10.
    r = RouteParams(
        id="vic", fare=50.0, travel_time=10.0, trip_cost=160.0,
        total_demand=4200.0, cost_advantage=30.0,
    )
    return derive_route(r, cfg)


def make_instance(cfg, specs):
    """specs: iterable of (id, fare, travel_time, demand, s)."""
    routes = [
        RouteParams(
            id=rid, fare=fare, travel_time=tt,
            trip_cost=0.8 * cfg.capacity * fare, total_demand=dem, cost_advantage=s,
        )
        for rid, fare, tt, dem, s in specs
    ]
    return Instance.build(cfg, routes)
