"""Tests for the REST surface: routes, auth, error envelope."""

import pytest

from dappbench.http_api import ROUTE_MANIFEST

from conftest import DEMO_ABI, DEMO_BYTECODE, Harness


class TestAuthRoutes:
    def test_register_login_use(self, harness):
        token = harness.signup("dev@example.com")
        response = harness.client.get("/api/v1/networks",
                                      headers=harness.auth(token))
        assert response.status_code == 200

    def test_bad_password_401(self, harness):
        harness.register("dev@example.com")
        response = harness.client.post(
            "/api/v1/auth/login",
            json={"email": "dev@example.com", "password": "wrong-password"})
        assert response.status_code == 401
        assert response.json()["error"]["code"] == "invalid_credentials"

    def test_duplicate_register_409(self, harness):
        harness.register("dev@example.com")
        response = harness.register("dev@example.com")
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "email_taken"

    def test_weak_password_422(self, harness):
        response = harness.register("dev@example.com", "short")
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "weak_password"


class TestNetworks:
    def test_add_and_list_mock(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        response = harness.client.get("/api/v1/networks",
                                      headers=harness.auth(token))
        networks = response.json()["networks"]
        assert [n["id"] for n in networks] == [network_id]
        assert networks[0]["chain_id"] == 1337
        assert networks[0]["gas_price"] == "0"

    def test_unauthenticated_401(self, harness):
        response = harness.client.get("/api/v1/networks")
        assert response.status_code == 401
        assert response.json()["error"]["code"] == "unauthenticated"

    def test_rpc_network_with_wrong_chain_id_422(self, harness, monkeypatch):
        from dappbench.chain import MockChain
        token = harness.signup("dev@example.com")
        monkeypatch.setattr(harness.workbench, "_make_backend",
                            lambda cfg: MockChain(4242))
        response = harness.client.post(
            "/api/v1/networks",
            json={"name": "other", "kind": "mock", "chain_id": 1337},
            headers=harness.auth(token))
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "chain_id_mismatch"


class TestApps:
    def test_create_returns_deployer_address(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        created = harness.create_app_record(token, network_id)
        assert created["deployer_address"].startswith("0x")
        assert len(created["deployer_address"]) == 42

    def test_share_grants_invoke(self, harness):
        owner = harness.signup("owner@example.com")
        network_id = harness.add_mock_network(owner)
        app_id = harness.create_app_record(owner, network_id)["app"]["id"]
        harness.deploy_demo(owner, app_id)
        caller = harness.signup("caller@example.com")

        response = harness.client.post(
            f"/api/v1/apps/{app_id}/share",
            json={"email": "caller@example.com", "role": "caller"},
            headers=harness.auth(owner))
        assert response.status_code == 200

        response = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/invoke",
            json={"method": "set", "args": ["3"]},
            headers=harness.auth(caller))
        assert response.status_code == 200, response.text

    def test_share_unknown_user_404(self, harness):
        owner = harness.signup("owner@example.com")
        network_id = harness.add_mock_network(owner)
        app_id = harness.create_app_record(owner, network_id)["app"]["id"]
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/share",
            json={"email": "ghost@example.com", "role": "viewer"},
            headers=harness.auth(owner))
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "no_such_user"

    def test_app_list_includes_shared(self, harness):
        owner = harness.signup("owner@example.com")
        network_id = harness.add_mock_network(owner)
        app_id = harness.create_app_record(owner, network_id)["app"]["id"]
        viewer = harness.signup("viewer@example.com")
        harness.client.post(
            f"/api/v1/apps/{app_id}/share",
            json={"email": "viewer@example.com", "role": "viewer"},
            headers=harness.auth(owner))
        response = harness.client.get("/api/v1/apps", headers=harness.auth(viewer))
        assert [a["id"] for a in response.json()["apps"]] == [app_id]


class TestApiKeys:
    @pytest.fixture
    def with_contract(self, harness):
        owner = harness.signup("owner@example.com")
        network_id = harness.add_mock_network(owner)
        app_id = harness.create_app_record(owner, network_id)["app"]["id"]
        harness.deploy_demo(owner, app_id)
        return harness, owner, app_id

    def test_token_shown_once_then_hash_only(self, with_contract):
        harness, owner, app_id = with_contract
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/keys", json={"label": "ci"},
            headers=harness.auth(owner))
        assert response.status_code == 201
        token = response.json()["token"]
        listing = harness.client.get(f"/api/v1/apps/{app_id}/keys",
                                     headers=harness.auth(owner)).json()
        assert token not in str(listing)
        assert listing["keys"][0]["key_hash"].startswith("0x")

    def test_api_key_can_invoke_and_call_and_read(self, with_contract):
        harness, owner, app_id = with_contract
        token = harness.client.post(
            f"/api/v1/apps/{app_id}/keys", json={"label": "ci"},
            headers=harness.auth(owner)).json()["token"]
        headers = {"X-API-Key": token}

        details = harness.client.get(
            f"/api/v1/apps/{app_id}/contracts/storage", headers=headers)
        assert details.status_code == 200

        invoke = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/invoke",
            json={"method": "set", "args": ["9"]}, headers=headers)
        assert invoke.status_code == 200

        call = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/call",
            json={"method": "get", "args": []}, headers=headers)
        assert call.status_code == 200
        assert call.json()["outputs"] == [{"type": "uint256", "value": "0"}]

    def test_revoked_key_401(self, with_contract):
        harness, owner, app_id = with_contract
        created = harness.client.post(
            f"/api/v1/apps/{app_id}/keys", json={"label": "ci"},
            headers=harness.auth(owner)).json()
        revoke = harness.client.delete(
            f"/api/v1/apps/{app_id}/keys/{created['key']['id']}",
            headers=harness.auth(owner))
        assert revoke.status_code == 200
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/invoke",
            json={"method": "set", "args": ["9"]},
            headers={"X-API-Key": created["token"]})
        assert response.status_code == 401

    def test_api_key_rejected_on_management_routes(self, with_contract):
        harness, owner, app_id = with_contract
        token = harness.client.post(
            f"/api/v1/apps/{app_id}/keys", json={"label": "ci"},
            headers=harness.auth(owner)).json()["token"]
        response = harness.client.get("/api/v1/apps",
                                      headers={"X-API-Key": token})
        assert response.status_code == 401

    def test_api_key_scoped_to_its_app(self, with_contract):
        harness, owner, app_id = with_contract
        other_id = harness.create_app_record(
            owner, harness.registry.get_app(app_id).network, name="other")["app"]["id"]
        harness.deploy_demo(owner, other_id, name="thing")
        token = harness.client.post(
            f"/api/v1/apps/{app_id}/keys", json={"label": "ci"},
            headers=harness.auth(owner)).json()["token"]
        response = harness.client.get(
            f"/api/v1/apps/{other_id}/contracts/thing",
            headers={"X-API-Key": token})
        assert response.status_code == 403


class TestDeployAndInteract:
    def test_deploy_returns_address_and_version(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        app_id = harness.create_app_record(token, network_id)["app"]["id"]
        deployed = harness.deploy_demo(token, app_id)
        assert deployed["version"] == 1
        assert len(deployed["address"]) == 42
        assert len(deployed["tx_hash"]) == 66

    def test_bad_abi_422(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        app_id = harness.create_app_record(token, network_id)["app"]["id"]
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts",
            json={"name": "x", "abi": "{broken", "bytecode": DEMO_BYTECODE},
            headers=harness.auth(token))
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "abi_parse_error"

    def test_new_version_listed_in_details(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        app_id = harness.create_app_record(token, network_id)["app"]["id"]
        harness.deploy_demo(token, app_id)
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/versions",
            json={"abi": DEMO_ABI, "bytecode": DEMO_BYTECODE},
            headers=harness.auth(token))
        assert response.status_code == 201
        assert response.json()["version"] == 2

        details = harness.client.get(
            f"/api/v1/apps/{app_id}/contracts/storage",
            headers=harness.auth(token)).json()
        assert len(details["versions"]) == 2
        assert details["versions"][1]["active"] is True
        assert {m["name"]: m["mutability"] for m in details["methods"]} == {
            "get": "view", "set": "nonpayable", "bump": "nonpayable"}

    def test_view_method_via_invoke_409(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        app_id = harness.create_app_record(token, network_id)["app"]["id"]
        harness.deploy_demo(token, app_id)
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/invoke",
            json={"method": "get"}, headers=harness.auth(token))
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "method_is_view"

    def test_unknown_method_404(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        app_id = harness.create_app_record(token, network_id)["app"]["id"]
        harness.deploy_demo(token, app_id)
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/call",
            json={"method": "nope"}, headers=harness.auth(token))
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "no_such_method"

    def test_type_mismatch_422(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        app_id = harness.create_app_record(token, network_id)["app"]["id"]
        harness.deploy_demo(token, app_id)
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/invoke",
            json={"method": "set", "args": ["not a number"]},
            headers=harness.auth(token))
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "type_mismatch"

    def test_values_are_decimal_strings(self, harness):
        token = harness.signup("dev@example.com")
        network_id = harness.add_mock_network(token)
        app_id = harness.create_app_record(token, network_id)["app"]["id"]
        deployed = harness.deploy_demo(token, app_id)
        backend = harness.workbench.backend_for(network_id)
        from dappbench.codec import from_hex
        big = 2 ** 200 + 7
        backend.register_stub(from_hex(deployed["address"]),
                              bytes.fromhex("6d4ce63c"),
                              big.to_bytes(32, "big"))
        response = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/call",
            json={"method": "get"}, headers=harness.auth(token))
        assert response.json()["outputs"][0]["value"] == str(big)
        invoke = harness.client.post(
            f"/api/v1/apps/{app_id}/contracts/storage/invoke",
            json={"method": "set", "args": [str(big)]},
            headers=harness.auth(token))
        assert invoke.json()["receipt"]["gas_used"] == "21000"


class TestErrorEnvelope:
    def test_envelope_on_every_induced_failure(self, harness):
        token = harness.signup("dev@example.com")
        cases = [
            harness.client.get("/api/v1/networks"),                      # 401
            harness.client.get("/api/v1/apps/huh", headers=harness.auth(token)),  # 404
            harness.client.post("/api/v1/auth/login",
                                json={"email": "x@y.z", "password": "nah"}),  # 401
            harness.client.post("/api/v1/apps", json={"bogus": True},
                                headers=harness.auth(token)),            # 422
            harness.client.get("/api/v1/not/a/route",
                               headers=harness.auth(token)),             # 404
            harness.client.delete("/api/v1/networks",
                                  headers=harness.auth(token)),          # 405
        ]
        for response in cases:
            assert response.status_code >= 400
            body = response.json()
            assert set(body) == {"error"}
            assert set(body["error"]) == {"code", "message"}

    def test_unauthenticated_sweep_all_routes(self, harness):
        for method, path, auth in ROUTE_MANIFEST:
            if auth == "open":
                continue
            concrete = (path.replace("{app_id}", "someapp")
                        .replace("{name}", "somecontract")
                        .replace("{key_id}", "somekey"))
            response = harness.client.request(method, concrete, json={})
            assert response.status_code == 401, (method, path, response.text)
            assert response.json()["error"]["code"] == "unauthenticated"

    def test_manifest_covers_every_registered_route(self, harness):
        documented = {(method, path) for method, path, _ in ROUTE_MANIFEST}
        actual = set()
        for route in harness.app.routes:
            if getattr(route, "path", "").startswith("/api/"):
                for method in route.methods - {"HEAD", "OPTIONS"}:
                    actual.add((method, route.path))
        assert actual == documented
