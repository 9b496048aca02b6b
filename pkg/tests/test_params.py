import json
import math

import pytest

from dudenet.params import (
    TABLE_I,
    ConfigError,
    ConfigWarning,
    SystemParams,
    db_to_linear,
    derive,
    emit_config,
    linear_to_db,
    load_config,
    near_field_loss,
)

TABLE_DOC = {
    "lambda_m": 5, "lambda_s": 50, "lambda_u": 200,
    "p_m": 46, "p_s": 30, "p_um": 23, "p_us": 23,
    "f_m": 2e9, "f_s": 70e9, "w_m": 20e6, "w_s": 1e9,
    "alpha_m": 3, "alpha_l": 2, "alpha_n": 4,
    "g_s_max": 18, "g_s_min": -2, "theta_s": 10, "omega": 0.11, "mu": 200,
    "noise_figure": 10,
}


def test_table_document_gives_defaults():
    p = load_config(TABLE_DOC)
    assert p.lambda_m == pytest.approx(5e-6)
    assert p.w_s == 1e9
    for name in TABLE_DOC:
        assert getattr(p, name) == pytest.approx(getattr(TABLE_I, name), rel=1e-12)


def test_empty_document_is_defaults():
    assert load_config({}) == TABLE_I
    assert load_config(None) == TABLE_I


def test_unit_strings():
    p = load_config({"p_s": "30 dBm", "lambda_s": "50 /km²", "w_m": "20 MHz", "mu": "0.2 km"})
    assert p.p_s == pytest.approx(1.0)
    assert p.lambda_s == pytest.approx(5e-5)
    assert p.w_m == 20e6
    assert p.mu == pytest.approx(200.0)


@pytest.mark.parametrize("doc, field", [
    ({"omega": 1.5}, "omega"),
    ({"alpha_m": 2.0}, "alpha_m"),
    ({"lambda_m": 0}, "lambda_m"),
    ({"p_s": "30 MHz"}, "p_s"),
    ({"mu": 0.5}, "mu"),
    ({"epsilon": 1.2}, "epsilon"),
    ({"joint_bias": 1}, "joint_bias"),
    ({"alpha_l": 5.0}, "alpha_l"),
])
def test_validation_errors_name_the_field(doc, field):
    with pytest.raises(ConfigError) as err:
        load_config(doc)
    assert err.value.field == field


def test_zero_scell_and_user_densities_allowed():
    p = load_config({"lambda_s": 0, "lambda_u": 0})
    assert p.lambda_s == 0 and p.lambda_u == 0


def test_unknown_key_warns():
    with pytest.warns(ConfigWarning):
        load_config({"lambda_x": 3})


def test_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(emit_config(TABLE_I)))
    p = load_config(path)
    for name in TABLE_DOC:
        assert getattr(p, name) == pytest.approx(getattr(TABLE_I, name), rel=1e-12)


def test_near_field_constant():
    c = 299_792_458.0
    assert near_field_loss(2e9) == pytest.approx((c / (4 * math.pi * 2e9)) ** 2, rel=1e-15)
    assert derive(TABLE_I).beta_m == pytest.approx(1.424e-4, rel=1e-3)


def test_equal_tiers_give_unit_weight_ratio():
    p = TABLE_I.replace(p_s=TABLE_I.p_m, p_us=TABLE_I.p_um, g_s_max=1.0, f_s=TABLE_I.f_m)
    dc = derive(p)
    assert dc.a_dl == pytest.approx(1.0) and dc.a_ul == pytest.approx(1.0)


def test_weight_ratios_recomputed_in_db():
    dc = derive(TABLE_I)
    beta_s_db = 20 * math.log10(299_792_458.0 / (4 * math.pi * 70e9))
    beta_m_db = 20 * math.log10(299_792_458.0 / (4 * math.pi * 2e9))
    a_dl_db = (30 + 0 + 18 + beta_s_db) - (46 + 0 + 0 + beta_m_db)
    a_ul_db = (23 + 18 + beta_s_db) - (23 + beta_m_db)
    assert linear_to_db(dc.a_dl) == pytest.approx(a_dl_db, abs=1e-9)
    assert linear_to_db(dc.a_ul) == pytest.approx(a_ul_db, abs=1e-9)


def test_joint_bias_aligns_directions():
    p = TABLE_I.replace(joint_bias=True, t_s=db_to_linear(20.0))
    dc = derive(p)
    assert dc.a_ul == pytest.approx(dc.a_dl, rel=1e-12)
    assert dc.t_s_ul == pytest.approx(p.p_s * p.t_s / p.p_us)


def test_params_are_immutable():
    with pytest.raises(Exception):
        TABLE_I.lambda_s = 1.0
    assert isinstance(TABLE_I.replace(lambda_s=1e-5), SystemParams)
