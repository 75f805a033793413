import pyspark.sql.functions as F
from pyspark.sql import SparkSession
from pyspark.sql.types import StructType, StructField, IntegerType, StringType, DateType, TimestampType, DecimalType, DoubleType
from datetime import datetime, timedelta

def clean_customers(df):
    email_cleaned = df.withColumn(
        "email_address",
        F.when(
            F.col("email_address").isNull() | 
            F.lower(F.col("email_address")).isin("", "invalid-email", "none"),
            F.lit("invalid_format@example.com")
        ).otherwise(F.col("email_address"))
    )

    names_formatted = email_cleaned \
        .withColumn("first_name", F.initcap("first_name")) \
        .withColumn("last_name", F.initcap("last_name"))

    gender_normalized = names_formatted.withColumn(
        "gender",
        F.when(
            F.lower("gender").isin("none", "prefer not to say"),
            F.lit("Prefer Not To Say")
        ).otherwise(F.initcap("gender"))
    )

    location_normalized = gender_normalized.withColumn(
        "state_province", F.upper("state_province")
    )

    phone_cleaned = location_normalized.withColumn(
        "phone_number", F.regexp_replace("phone_number", "[^0-9]", "")
    )

    registration_parsed = phone_cleaned.withColumn(
        "registration_date", F.to_timestamp("registration_date")
    ).filter(F.col("registration_date").isNotNull())

    premium_flagged = registration_parsed.withColumn(
        "is_premium_member",
        F.when(F.lower("is_premium_member").isin("true", "1", "yes"), F.lit(True))
         .otherwise(F.lit(False))
    )

    deduplicated = premium_flagged.dropDuplicates(["customer_id"])

    return deduplicated

def clean_accounts(df):
    balance_casted = df.withColumn("balance", F.col("balance").cast(DecimalType(18, 2)))

    balance_cleaned = balance_casted.withColumn(
        "balance",
        F.when(F.col("balance").isNull() | (F.col("balance") < 0), F.lit(0.00))
        .otherwise(F.col("balance"))
    )

    account_type_cleaned = balance_cleaned.withColumn(
        "account_type",
        F.when(F.lower("account_type").isin("none", "unspecified"), F.lit("Unspecified"))
         .otherwise(F.initcap("account_type"))
    )

    status_formatted = account_type_cleaned.withColumn("status", F.initcap("status"))

    opening_date_parsed = status_formatted.withColumn(
        "opening_date", F.to_date("opening_date")
    ).filter(F.col("opening_date").isNotNull())

    interest_casted = opening_date_parsed.withColumn(
        "interest_rate", F.col("interest_rate").cast(DoubleType())
    )

    credit_limit_casted = interest_casted.withColumn(
        "credit_limit", F.col("credit_limit").cast(DecimalType(18, 2))
    )

    return credit_limit_casted.dropDuplicates(["account_id"])


def clean_transactions(df):
    df = df.withColumn("transaction_timestamp", F.to_timestamp("transaction_timestamp")) \
           .filter(F.col("transaction_timestamp").isNotNull()) \
           .withColumn(
               "transaction_timestamp",
               F.when(F.col("transaction_timestamp") > F.current_timestamp(), F.current_timestamp())
                .otherwise(F.col("transaction_timestamp"))
           ) \
           .withColumn("amount", F.col("amount").cast(DecimalType(18, 2))) \
           .withColumn("amount", F.when(F.col("amount").isNull(), F.lit(0.00)).otherwise(F.abs("amount"))) \
           .withColumn(
               "transaction_type",
               F.when(F.lower("transaction_type").isin("unknown", "none"), F.lit("Other"))
                .otherwise(F.initcap("transaction_type"))
           ) \
           .withColumn("status", F.initcap("status"))

    return df.dropDuplicates()

if __name__ == "__main__":
    spark.conf.set("spark.storage.synapse.linkedServiceName",linked_service_name)
    spark.conf.set("fs.azure.account.oauth.provider.type","com.bank.azure.synapse.tokenlibrary.LinkedServiceBasedTokenProvider")

    raw_customers_df = spark.read.load('abfss://bank@efgh.dfs.core.windows.net/raw_customers/customers.parquet',format='parquet')
    raw_accounts_df = spark.read.load('abfss://bank@efgh.dfs.core.windows.net/raw_accounts/accounts.parquet',format='parquet')
    raw_transactions_df = spark.read.load('abfss://bank@efgh.dfs.core.windows.net/raw_transactions/transactions.parquet',format='parquet')

    print("\n--- Applying Cleaning Transformations ---")
    cleaned_customers_df = clean_customers(raw_customers_df)
    cleaned_accounts_df = clean_accounts(raw_accounts_df)
    cleaned_transactions_df = clean_transactions(raw_transactions_df)

    OutputPath_customers='abfss://bank@efgh.dfs.core.windows.net/customersprod/customers.parquet'
    OutputPath_accounts='abfss://bank@efgh.dfs.core.windows.net/accountprod/accounts.parquet'
    OutputPath_transactions='abfss://bank@efgh.dfs.core.windows.net/transactionsprod/transactions.parquet'

    cleaned_customers_df.write.mode('overwrite').parquet(OutputPath_customers)
    cleaned_accounts_df.write.mode('overwrite').parquet(OutputPath_accounts)
    cleaned_transactions_df.write.mode('overwrite').parquet(OutputPath_transactions)


>>>>>

SELECT
    C.customer_id AS CustomerId,
    C.first_name AS FirstName,
    C.last_name AS LastName,
    C.is_premium_member AS IsPremiumMember,
    C.registration_date AS CustomerRegistrationDate,
    A.account_type AS AccountType,
    A.balance AS CurrentAccountBalance,
    A.credit_limit AS AccountCreditLimit,
    A.opening_date AS AccountOpeningDate,
    SUM(T.amount) AS TotalAmountSpent,
    COUNT(T.transaction_id) AS MonthlyTransactionCount,
    AVG(T.amount) AS AverageMonthlyTransactionAmount
FROM
    Customers AS C
INNER JOIN
    Accounts AS A ON C.customer_id = A.customer_id
INNER JOIN
    Transactions AS T ON A.account_id = T.account_id
WHERE
    T.transaction_timestamp >= '2025-05-01' AND T.transaction_timestamp < '2025-06-01'
    AND T.transaction_type IN ('Withdrawal', 'Purchase', 'Bill Payment', 'Transfer-Out')
    AND T.status = 'Completed'
GROUP BY
    C.customer_id,
    C.first_name,
    C.last_name,
    C.is_premium_member,
    C.registration_date,
    A.account_type,
    A.balance,
    A.credit_limit,
    A.opening_date
ORDER BY
    TotalAmountSpent DESC, C.customer_id, A.account_type;
