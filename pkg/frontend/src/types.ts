// Wire types of the /api/v1 surface. Integers that can exceed 2^53
// (wei amounts, ABI values, gas) are decimal strings end to end; the UI
// never coerces them to number.

export interface NetworkInfo {
  id: string;
  name: string;
  kind: 'mock' | 'rpc';
  chain_id: number;
  rpc_url: string;
  gas_price: string;
  gas_limit_default: number;
}

export interface AppInfo {
  id: string;
  name: string;
  owner: string;
  network: string;
  deployer_address: string;
  created_at: number;
  shares: Record<string, string>;
  contracts: string[];
}

export interface MethodInfo {
  name: string;
  signature: string;
  selector: string;
  inputs: { name: string; type: string }[];
  outputs: string[];
  mutability: 'view' | 'nonpayable' | 'payable';
}

export interface VersionInfo {
  version: number;
  address: string;
  bytecode_hash: string;
  deploy_tx: string;
  deployed_at: number;
  deployer: string;
  active: boolean;
}

export interface ContractDetails {
  name: string;
  active_version: number;
  methods: MethodInfo[];
  versions: VersionInfo[];
  accounts: string[];
}

export interface ContractSummary {
  name: string;
  active_version: number;
  versions: number;
}

export interface ApiKeyInfo {
  id: string;
  application: string;
  key_hash: string;
  label: string;
  created_at: number;
  revoked: boolean;
}

export interface ReceiptInfo {
  tx_hash: string;
  status: 'success' | 'failure';
  contract_address: string | null;
  block_number: number;
  gas_used: string;
}

export interface InvokeResponse {
  tx_hash: string;
  receipt: ReceiptInfo;
  version_used: number;
}

export interface OutputValue {
  type: string;
  value: unknown;
}

export interface CallResponse {
  outputs: OutputValue[];
  version_used: number;
}

export interface DeployResponse {
  contract: string;
  version: number;
  address: string;
  tx_hash: string;
}
