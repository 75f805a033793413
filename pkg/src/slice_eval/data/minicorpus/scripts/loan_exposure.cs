using System;
using System.Data;
using System.Data.SqlClient;

public static class LoanStaging
{
    public static void Run(SqlConnection conn)
    {
        var loans = new DataTable();
        loans.Load(new SqlCommand("SELECT loan_id, borrower_id, principal, rate, status FROM lending.loans", conn).ExecuteReader());
        foreach (DataRow row in loans.Rows)
        {
            decimal principal = Convert.ToDecimal(row["principal"]);
            row["principal"] = Math.Round(principal, 2);
            row["status"] = row["status"].ToString().Trim().ToUpper();
        }
        using (var bulk = new SqlBulkCopy(conn))
        {
            bulk.DestinationTableName = "staging.loans_clean";
            bulk.WriteToServer(loans);
        }
    }
}

>>>>>

WITH active AS (
    SELECT l.loan_id, l.borrower_id, l.principal, l.rate
    FROM staging.loans_clean AS l
    WHERE l.status = 'ACTIVE'
)
SELECT
    b.borrower_id AS BorrowerId,
    b.credit_band AS CreditBand,
    SUM(a.principal) AS TotalPrincipal,
    AVG(a.rate) AS AverageRate,
    MAX(a.rate) AS MaxRate,
    COUNT(a.loan_id) AS ActiveLoanCount
FROM active AS a
INNER JOIN lending.borrowers AS b ON a.borrower_id = b.borrower_id
GROUP BY b.borrower_id, b.credit_band;
