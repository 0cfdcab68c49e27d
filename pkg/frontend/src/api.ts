// HTTP client for the workbench REST API. Every request this module can
// issue is listed in ROUTE_MANIFEST; the contract test asserts the two
// stay in sync, so the UI can never drift onto undocumented routes.

import type {
  ApiKeyInfo,
  AppInfo,
  CallResponse,
  ContractDetails,
  ContractSummary,
  DeployResponse,
  InvokeResponse,
  NetworkInfo,
} from './types.js';

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
    this.code = code;
  }
}

export type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

// method, path template — mirrors the documented /api/v1 surface
export const ROUTE_MANIFEST: ReadonlyArray<readonly [string, string]> = [
  ['POST', '/api/v1/auth/register'],
  ['POST', '/api/v1/auth/login'],
  ['GET', '/api/v1/networks'],
  ['POST', '/api/v1/networks'],
  ['GET', '/api/v1/apps'],
  ['POST', '/api/v1/apps'],
  ['GET', '/api/v1/apps/{app_id}'],
  ['POST', '/api/v1/apps/{app_id}/share'],
  ['GET', '/api/v1/apps/{app_id}/keys'],
  ['POST', '/api/v1/apps/{app_id}/keys'],
  ['DELETE', '/api/v1/apps/{app_id}/keys/{key_id}'],
  ['GET', '/api/v1/apps/{app_id}/contracts'],
  ['POST', '/api/v1/apps/{app_id}/contracts'],
  ['GET', '/api/v1/apps/{app_id}/contracts/{name}'],
  ['POST', '/api/v1/apps/{app_id}/contracts/{name}/versions'],
  ['POST', '/api/v1/apps/{app_id}/contracts/{name}/invoke'],
  ['POST', '/api/v1/apps/{app_id}/contracts/{name}/call'],
];

export class WorkbenchApi {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  // session token lives in memory only; it is never written to storage
  token: string | null = null;
  apiKey: string | null = null;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
    this.fetchImpl =
      fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {
      'content-type': 'application/json',
    };
    if (this.token) {
      headers['Authorization'] = `Bearer ${this.token}`;
    } else if (this.apiKey) {
      headers['X-API-Key'] = this.apiKey;
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = 'unknown';
      let message = `HTTP ${response.status}`;
      try {
        const payload = (await response.json()) as {
          error?: { code?: string; message?: string };
        };
        code = payload.error?.code ?? code;
        message = payload.error?.message ?? message;
      } catch {
        // keep fallbacks
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  // -- accounts ----------------------------------------------------------

  async register(email: string, password: string): Promise<string> {
    const result = await this.request<{ user_id: string }>(
      'POST',
      '/api/v1/auth/register',
      { email, password },
    );
    return result.user_id;
  }

  async login(email: string, password: string): Promise<string> {
    const result = await this.request<{ token: string }>(
      'POST',
      '/api/v1/auth/login',
      { email, password },
    );
    this.token = result.token;
    return result.token;
  }

  // -- networks -----------------------------------------------------------

  async listNetworks(): Promise<NetworkInfo[]> {
    const result = await this.request<{ networks: NetworkInfo[] }>(
      'GET',
      '/api/v1/networks',
    );
    return result.networks;
  }

  async addNetwork(body: {
    name: string;
    kind: 'mock' | 'rpc';
    chain_id: number;
    rpc_url?: string;
    gas_price?: string;
    gas_limit_default?: number;
  }): Promise<NetworkInfo> {
    const result = await this.request<{ network: NetworkInfo }>(
      'POST',
      '/api/v1/networks',
      body,
    );
    return result.network;
  }

  // -- applications ---------------------------------------------------------

  async listApps(): Promise<AppInfo[]> {
    return (await this.request<{ apps: AppInfo[] }>('GET', '/api/v1/apps')).apps;
  }

  async createApp(
    name: string,
    networkId: string,
  ): Promise<{ app: AppInfo; deployer_address: string }> {
    return this.request('POST', '/api/v1/apps', {
      name,
      network_id: networkId,
    });
  }

  async getApp(appId: string): Promise<AppInfo> {
    return (
      await this.request<{ app: AppInfo }>('GET', `/api/v1/apps/${appId}`)
    ).app;
  }

  async shareApp(appId: string, email: string, role: string): Promise<AppInfo> {
    return (
      await this.request<{ app: AppInfo }>(
        'POST',
        `/api/v1/apps/${appId}/share`,
        { email, role },
      )
    ).app;
  }

  // -- API keys ---------------------------------------------------------------

  async listKeys(appId: string): Promise<ApiKeyInfo[]> {
    return (
      await this.request<{ keys: ApiKeyInfo[] }>(
        'GET',
        `/api/v1/apps/${appId}/keys`,
      )
    ).keys;
  }

  async createKey(
    appId: string,
    label: string,
  ): Promise<{ token: string; key: ApiKeyInfo }> {
    return this.request('POST', `/api/v1/apps/${appId}/keys`, { label });
  }

  async revokeKey(appId: string, keyId: string): Promise<ApiKeyInfo> {
    return (
      await this.request<{ key: ApiKeyInfo }>(
        'DELETE',
        `/api/v1/apps/${appId}/keys/${keyId}`,
      )
    ).key;
  }

  // -- contracts -----------------------------------------------------------------

  async listContracts(appId: string): Promise<ContractSummary[]> {
    return (
      await this.request<{ contracts: ContractSummary[] }>(
        'GET',
        `/api/v1/apps/${appId}/contracts`,
      )
    ).contracts;
  }

  async deployContract(
    appId: string,
    body: {
      name: string;
      abi: string | unknown[];
      bytecode: string;
      constructor_args?: unknown[];
      gas_limit?: number;
    },
  ): Promise<DeployResponse> {
    return this.request('POST', `/api/v1/apps/${appId}/contracts`, body);
  }

  async deployVersion(
    appId: string,
    contract: string,
    body: {
      abi: string | unknown[];
      bytecode: string;
      constructor_args?: unknown[];
      gas_limit?: number;
    },
  ): Promise<DeployResponse> {
    return this.request(
      'POST',
      `/api/v1/apps/${appId}/contracts/${contract}/versions`,
      body,
    );
  }

  async contractDetails(
    appId: string,
    contract: string,
  ): Promise<ContractDetails> {
    return this.request('GET', `/api/v1/apps/${appId}/contracts/${contract}`);
  }

  async invoke(
    appId: string,
    contract: string,
    method: string,
    args: unknown[],
    version?: number,
  ): Promise<InvokeResponse> {
    return this.request(
      'POST',
      `/api/v1/apps/${appId}/contracts/${contract}/invoke`,
      { method, args, version: version ?? null },
    );
  }

  async call(
    appId: string,
    contract: string,
    method: string,
    args: unknown[],
    version?: number,
  ): Promise<CallResponse> {
    return this.request(
      'POST',
      `/api/v1/apps/${appId}/contracts/${contract}/call`,
      { method, args, version: version ?? null },
    );
  }
}
