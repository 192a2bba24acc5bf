import json

import pytest
from pydantic import ValidationError

from potbi.common.config import CONFIG_ENV_VAR, RunConfig, load_config
from potbi.common.errors import ConfigError


def base_config(**overrides):
    data = {
        "endpoints": [
            {"model_id": "vlm_01", "base_url": "http://127.0.0.1:9001", "model_name": "llama"},
            {"model_id": "vlm_02", "base_url": "http://127.0.0.1:9001", "model_name": "pixtral"},
        ],
        "judge_endpoint": {"model_id": "judge", "base_url": "http://127.0.0.1:9002", "model_name": "o3"},
    }
    data.update(overrides)
    return data


def test_load_json_config_with_defaults(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(base_config(quorum=0.6)))
    config = load_config(path)
    assert [e.model_id for e in config.endpoints] == ["vlm_01", "vlm_02"]
    assert config.quorum == 0.6
    assert config.fallback_policy == "fallback_majority"
    assert config.max_parallel == 1
    assert config.taxonomy.labels == ("no_tbi", "mild_tbi", "moderate_tbi", "severe_tbi")
    assert "vlm_default" in config.templates and "judge_default" in config.templates
    assert config.strip_keys == ("name", "dob", "mrn", "address", "physician")


def test_load_toml_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        'seed = 11\n'
        'fallback_policy = "strict_judge"\n'
        '[[endpoints]]\n'
        'model_id = "vlm_01"\nbase_url = "http://localhost:1"\nmodel_name = "a"\n'
        '[judge_endpoint]\n'
        'model_id = "judge"\nbase_url = "http://localhost:2"\nmodel_name = "o3"\n'
    )
    config = load_config(path)
    assert config.seed == 11
    assert config.fallback_policy == "strict_judge"


def test_env_var_is_the_default_path(tmp_path, monkeypatch):
    path = tmp_path / "env.json"
    path.write_text(json.dumps(base_config(seed=3)))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert load_config().seed == 3


def test_missing_config_path(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    with pytest.raises(ConfigError):
        load_config()


@pytest.mark.parametrize(
    "overrides",
    [
        {"endpoints": []},
        {"quorum": 0},
        {"quorum": 1.5},
        {"max_parallel": 0},
        {"judge_endpoint": {"model_id": "vlm_01", "base_url": "http://x", "model_name": "o3"}},
        {"judge_template_id": "nope"},
    ],
)
def test_invalid_configs_raise_config_error(tmp_path, overrides):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(base_config(**overrides)))
    with pytest.raises(ConfigError):
        load_config(path)


def test_duplicate_model_ids_rejected(tmp_path):
    data = base_config()
    data["endpoints"][1]["model_id"] = "vlm_01"
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ConfigError):
        load_config(path)


def test_unparseable_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_custom_templates_extend_defaults():
    config = RunConfig.model_validate(
        base_config(templates={"short": "Classify into: {taxonomy_list}."})
    )
    assert config.templates["short"] == "Classify into: {taxonomy_list}."
    assert "vlm_default" in config.templates


def test_overrides_apply_and_validate():
    config = RunConfig.model_validate(base_config())
    changed = config.with_overrides(quorum=1.0, seed=None, max_parallel=4)
    assert changed.quorum == 1.0 and changed.max_parallel == 4
    assert changed.seed == config.seed
    with pytest.raises(ConfigError):
        config.with_overrides(quorum=2.0)


@pytest.mark.parametrize(
    "member_ids", [("majority", "vlm_02"), ("vlm_01", "judge"), ("org/m", "org:m"), ("VLM", "vlm")]
)
def test_member_ids_must_not_clash_with_report_strategies(member_ids):
    data = base_config()
    for endpoint, model_id in zip(data["endpoints"], member_ids):
        endpoint["model_id"] = model_id
    data["judge_endpoint"]["model_id"] = "arbiter"
    with pytest.raises(ValidationError):
        RunConfig.model_validate(data)


def test_judge_endpoint_may_be_called_judge():
    config = RunConfig.model_validate(base_config())
    assert config.judge_endpoint.model_id == "judge"


def test_unknown_member_placeholder_is_a_config_error(tmp_path):
    data = base_config(templates={"terse": "Case {case_id}, patient {patient_name}."})
    data["endpoints"][0]["prompt_template_id"] = "terse"
    path = tmp_path / "placeholder.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ConfigError, match="patient_name"):
        load_config(path)


def test_unknown_judge_placeholder_is_a_config_error(tmp_path):
    path = tmp_path / "judge.json"
    path.write_text(
        json.dumps(base_config(templates={"j": "{model_blocks} {image_url}"}, judge_template_id="j"))
    )
    with pytest.raises(ConfigError, match="image_url"):
        load_config(path)


def test_judge_placeholders_are_not_member_placeholders():
    data = base_config(templates={"leaky": "{taxonomy_list} {tally_summary}"})
    data["endpoints"][1]["prompt_template_id"] = "leaky"
    with pytest.raises(ValidationError):
        RunConfig.model_validate(data)


@pytest.mark.parametrize("labels", [["no_tbi", "abstain"], ["Abstain", "mild_tbi"]])
def test_abstain_is_not_a_taxonomy_label(labels):
    with pytest.raises(ValidationError):
        RunConfig.model_validate(base_config(taxonomy={"labels": labels, "synonyms": {}}))
