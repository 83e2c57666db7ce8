from validation import ModelFamily, ParamGate, validate_params

BASE = {"checkpoint_cost": "600s", "recovery_cost": "600s", "error_rate": "100000/100y"}


def test_valid_params_pass_unchanged():
    result = validate_params(dict(BASE))
    assert result.is_valid
    assert result.params.checkpoint_cost == 600.0
    assert result.error_message is None


def test_missing_error_rate_is_named():
    data = dict(BASE)
    del data["error_rate"]
    result = validate_params(data)
    assert not result.is_valid
    assert any(e.startswith("error_rate") for e in result.errors)


def test_each_violation_is_reported():
    data = dict(BASE, checkpoint_cost=-5.0, recovery_cost="5 weeks")
    result = ParamGate().validate(data)
    assert not result.is_valid
    fields = {e.split(" ")[0] for e in result.errors}
    assert fields == {"checkpoint_cost", "recovery_cost"}


def test_unknown_field_rejected_by_name():
    result = validate_params(dict(BASE, chekpoint_cost="1s"))
    assert not result.is_valid
    assert "chekpoint_cost unbekanntes Feld" in result.errors


def test_model_family_requirements():
    result = validate_params(dict(BASE), ModelFamily.LATENCY, ModelFamily.VERIFICATION)
    assert not result.is_valid
    assert len(result.errors) == 2
    assert "detection_rate" in result.error_message
    assert "verification_cost" in result.error_message

    complete = dict(BASE, detection_rate="3000000/100y", verification_cost="20s")
    assert validate_params(complete, ModelFamily.LATENCY, ModelFamily.VERIFICATION).is_valid


def test_missing_platform():
    result = validate_params(None)
    assert not result.is_valid
    assert result.errors == ["platform fehlt"]
